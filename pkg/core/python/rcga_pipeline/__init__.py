# Core r-cGA pipeline modules
