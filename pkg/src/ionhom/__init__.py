"""Two-ion resonance-fluorescence interference: Bloch model, photon-stream simulation, correlator."""
