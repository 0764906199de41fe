from display import emit_line

class Reporter:
    def __init__(self):
        self.count = 0

    def emit(self, value):
        self.count = self.count + 1
        emit_line(value)
