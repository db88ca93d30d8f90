def flood_fill(image, row, col, new_color):
    grid = [list(line) for line in image]
    if not grid:
        return grid
    old_color = grid[row][col]
    if old_color == new_color:
        return grid

    def fill(r, c):
        if r < 0 or r >= len(grid) or c < 0 or c >= len(grid[0]):
            return
        if grid[r][c] != old_color:
            return
        grid[r][c] = new_color
        for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            fill(r + dr, c + dc)

    fill(row, col)
    return grid
