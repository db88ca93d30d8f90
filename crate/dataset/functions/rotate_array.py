def rotate_array(arr, steps):
    if not arr:
        return []
    steps = steps % len(arr)
    return arr[-steps:] + arr[:-steps] if steps else list(arr)
