"""HTTP facade over the simulator core."""
