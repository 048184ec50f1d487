"""OAM-addressed, polarization-encoded BB84 network simulator."""
