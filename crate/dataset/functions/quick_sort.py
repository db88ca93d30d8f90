def quick_sort(collection):
    if len(collection) < 2:
        return list(collection)
    pivot = collection[len(collection) // 2]
    lesser = [item for item in collection if item < pivot]
    equal = [item for item in collection if item == pivot]
    greater = [item for item in collection if item > pivot]
    return quick_sort(lesser) + equal + quick_sort(greater)
