"""CuPID coarse-frame codec service package."""
