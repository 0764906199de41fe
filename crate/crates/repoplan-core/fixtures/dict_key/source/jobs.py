from api import send_request
from payloads import make_payload

class Worker:
    def __init__(self, queue):
        self.queue = queue

    def submit(self, job):
        payload = make_payload(job)
        payload.api_key = "w1"
        payload.api_type = "submit"
        result = send_request(payload)
        return result

    def poll(self, job):
        payload = make_payload(job)
        payload.api_key = "w1"
        payload.api_type = "poll"
        result = send_request(payload)
        return result

    def cancel(self, job):
        payload = make_payload(job)
        payload.api_key = "w1"
        payload.api_type = "cancel"
        result = send_request(payload)
        return result
