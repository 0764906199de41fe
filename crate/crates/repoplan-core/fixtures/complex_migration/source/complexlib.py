class Pair:
    def __init__(self, first, second):
        self.first = first
        self.second = second

class Complex:
    def __init__(self, real, imag):
        self.real = real
        self.imag = imag

def create_pair(first, second):
    return Pair(first, second)

def create_complex(real, imag):
    return Complex(real, imag)
