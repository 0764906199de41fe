from report import Reporter

class Pipeline:
    def __init__(self, limit):
        self.limit = limit
        self.reporter = Reporter()

    def run(self, data):
        self.reporter.emit(data)
        return data
