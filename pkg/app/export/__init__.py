# Export package
