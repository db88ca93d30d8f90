def binary_search(sorted_collection, item):
    left = 0
    right = len(sorted_collection) - 1
    while left <= right:
        midpoint = left + (right - left) // 2
        current = sorted_collection[midpoint]
        if current == item:
            return midpoint
        elif item < current:
            right = midpoint - 1
        else:
            left = midpoint + 1
    return -1
