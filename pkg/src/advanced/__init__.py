# Maupertuis-Jacobi correspondence and exponential maps
