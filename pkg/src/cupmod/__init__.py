"""
Persistent cup modules of simplex-wise filtrations over Z/2: ordinary and
relative cup barcodes, partition modules, persistent cup-length, a
brute-force rank oracle and geometric filtrations of point clouds.
"""
