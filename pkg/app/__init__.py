"""App module init"""
