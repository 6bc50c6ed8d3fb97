"""The FOX metaheuristic, benchmark functions and optimizer comparison."""
