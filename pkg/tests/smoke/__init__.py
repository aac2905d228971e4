# This file makes the smoke subdirectory a Python package.