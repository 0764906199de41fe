class Payload:
    def __init__(self):
        self.api_key = ""
        self.api_type = ""

def make_payload(name):
    p = Payload()
    p.name = name
    return p
