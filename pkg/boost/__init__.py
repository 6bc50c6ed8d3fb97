"""Second-order gradient-boosted trees with softmax loss."""
