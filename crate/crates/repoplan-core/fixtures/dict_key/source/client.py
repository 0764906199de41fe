from api import send_request
from payloads import make_payload

def create_user(name):
    payload = make_payload(name)
    payload.api_key = "k1"
    payload.api_type = "create"
    result = send_request(payload)
    return result

def delete_user(name):
    payload = make_payload(name)
    payload.api_key = "k1"
    payload.api_type = "delete"
    result = send_request(payload)
    return result

def list_users(limit):
    payload = make_payload(limit)
    payload.api_key = "k1"
    payload.api_type = "list"
    result = send_request(payload)
    return result

def update_user(name):
    payload = make_payload(name)
    payload.api_key = "k1"
    payload.api_type = "update"
    result = send_request(payload)
    return result
