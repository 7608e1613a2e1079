# Numerical services, one module per subject
