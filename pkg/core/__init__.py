"""Shared configuration, errors, logging, file helpers and run status."""
