from .settings import Settings, clear_settings_cache, get_settings, settings_override

__all__ = ["Settings", "clear_settings_cache", "get_settings", "settings_override"]
