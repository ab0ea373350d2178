# Test package for diffusion-sr
