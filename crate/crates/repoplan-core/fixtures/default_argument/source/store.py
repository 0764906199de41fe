def fetch_state(source, filename, cache_dir):
    state = source
    return state
