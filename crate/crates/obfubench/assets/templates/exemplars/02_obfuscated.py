def _O1lI0(_Il0O1, _0lI1O):
    _lOI10 = lambda _1: int(_1 == _0lI1O)
    _unused = "".join([])
    return sum(map(_lOI10, _Il0O1))
