"""Project configuration package for PotLab (settings only, no web entry points)."""
