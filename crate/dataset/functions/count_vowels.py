def count_vowels(text):
    if not isinstance(text, str):
        raise ValueError("Input must be a string")
    vowels = "aeiouAEIOU"
    return sum(1 for char in text if char in vowels)
