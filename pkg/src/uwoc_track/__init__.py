"""AUV-to-ship underwater optical link tracking simulator."""
