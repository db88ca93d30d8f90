def binary_tree_depth(node):
    # a tree is None or a tuple (value, left, right)
    if node is None:
        return 0
    _, left, right = node
    return 1 + max(binary_tree_depth(left), binary_tree_depth(right))
