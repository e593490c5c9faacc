"""Access to the ``POTLAB`` defaults table in settings."""

from django.conf import settings

_MISSING = object()


def get_default(key, default=_MISSING):
    """
    Return ``settings.POTLAB[key]``.

    Args:
        key (str): Name of the default.
        default: Returned when the key is absent; if omitted a missing key
            raises ``KeyError``.

    Returns:
        The configured value.
    """
    table = getattr(settings, 'POTLAB', {})
    if key in table:
        return table[key]
    if default is _MISSING:
        raise KeyError(f'POTLAB has no default named {key!r}')
    return default


def level_default(key, n):
    """Per-dimension entry of a ``{dimension: level}`` table such as ``LEVEL_CAP``."""
    table = get_default(key)
    return table.get(n, table.get(3))
