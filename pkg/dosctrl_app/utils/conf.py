"""
Settings access for library code.

Reads from the Django settings when they are configured and falls back to
the given default otherwise, so the numerical modules can be used (and
tested) without bootstrapping Django.
"""

from typing import Any

from django.conf import settings


def get_setting(name: str, default: Any = None) -> Any:
    """Return settings.<name> if Django is configured, else default"""
    if settings.configured:
        return getattr(settings, name, default)
    return default
