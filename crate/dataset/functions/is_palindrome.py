def is_palindrome(text):
    cleaned = [ch.lower() for ch in text if ch.isalnum()]
    start, end = 0, len(cleaned) - 1
    while start < end:
        if cleaned[start] != cleaned[end]:
            return False
        start += 1
        end -= 1
    return True
