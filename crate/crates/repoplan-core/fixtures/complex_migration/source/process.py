from create import func
from display import show

def process(a, b, k):
    c = func(a, b)
    show(c.first)
    show(c.second)
    norm = c.first * c.first + c.second * c.second
    show(norm * k)
