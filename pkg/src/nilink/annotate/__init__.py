"""Annotation workflow: session store and HTTP API."""
