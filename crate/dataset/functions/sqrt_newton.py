def sqrt_newton(value, tolerance=1e-10, max_iter=100):
    if value < 0:
        raise ValueError("math domain error")
    if value == 0:
        return 0.0
    guess = value if value >= 1 else 1.0
    for _ in range(max_iter):
        nxt = 0.5 * (guess + value / guess)
        if abs(nxt - guess) < tolerance:
            return nxt
        guess = nxt
    return guess
