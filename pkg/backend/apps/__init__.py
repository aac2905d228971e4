"""
Apps package for Software Distribution Platform.
"""