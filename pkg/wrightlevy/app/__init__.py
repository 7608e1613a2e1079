"""
wrightlevy application package
"""
