def transmit(key, kind):
    return key

def send_request(data):
    api_key = data.pop("api_key")
    api_type = data.pop("api_type")
    sent = transmit(api_key, api_type)
    return sent
