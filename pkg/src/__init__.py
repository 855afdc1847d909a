# Simulator source package
