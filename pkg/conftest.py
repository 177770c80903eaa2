from hypothesis import settings

# El primer llamado a galois/numba compila JIT y excede el deadline por defecto
# de hypothesis (200 ms); el tiempo no es parte de lo que verifican los tests.
settings.register_profile("default_no_deadline", deadline=None)
settings.load_profile("default_no_deadline")
