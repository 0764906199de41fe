from api import send_request
from payloads import make_payload

def reset_keys(scope):
    payload = make_payload(scope)
    payload.api_key = "a1"
    payload.api_type = "reset"
    result = send_request(payload)
    return result

def rotate_keys(scope):
    payload = make_payload(scope)
    payload.api_key = "a1"
    payload.api_type = "rotate"
    result = send_request(payload)
    return result

def audit(scope):
    payload = make_payload(scope)
    payload.api_key = "a1"
    payload.api_type = "audit"
    result = send_request(payload)
    return result
