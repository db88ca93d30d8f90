def flatten_list(nested):
    flat = []
    for element in nested:
        if isinstance(element, (list, tuple)):
            flat.extend(flatten_list(element))
        else:
            flat.append(element)
    return flat
