from store import fetch_state

def load_checkpoint(file_or_url, cache_dir):
    state = fetch_state(file_or_url, "all_in_one.pt", cache_dir)
    return state
