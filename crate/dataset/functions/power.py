def power(base, exponent):
    # exponentiation by squaring, negative exponents give floats
    if exponent < 0:
        return 1 / power(base, -exponent)
    result = 1
    while exponent > 0:
        if exponent % 2 == 1:
            result *= base
        base *= base
        exponent //= 2
    return result
