from complexlib import Pair, create_pair, Complex, create_complex

def func(a, b) -> Pair:
    c = create_pair(a, b)
    return c
