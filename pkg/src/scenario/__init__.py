from .scene import Scene, SceneLoadError, load_scene
