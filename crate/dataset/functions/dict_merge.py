def dict_merge(base, override):
    merged = dict(base)
    for key, value in override.items():
        if key in merged and isinstance(merged[key], dict) and isinstance(value, dict):
            merged[key] = dict_merge(merged[key], value)
        else:
            merged[key] = value
    return merged
