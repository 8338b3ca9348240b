"""Tiny order-pricing package used as an ingest fixture."""

from .models import Item, Order

__all__ = ["Item", "Order"]
