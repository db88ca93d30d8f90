def _lI0O1(_O0lI1):
    def _I1O0l(_l0):
        return 0 if _l0 == 0 else (_l0 % 10) + _I1O0l(_l0 // 10)
    _unused = [_O0lI1] * 0
    return _I1O0l(abs(_O0lI1))
