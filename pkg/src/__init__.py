# Perimeter patrol game library
