def tower_of_hanoi(height, source="A", target="C", spare="B"):
    moves = []

    def move_tower(count, from_pole, to_pole, with_pole):
        if count >= 1:
            move_tower(count - 1, from_pole, with_pole, to_pole)
            moves.append((from_pole, to_pole))
            move_tower(count - 1, with_pole, to_pole, from_pole)

    move_tower(height, source, target, spare)
    return moves
