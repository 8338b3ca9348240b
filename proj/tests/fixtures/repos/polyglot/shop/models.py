from dataclasses import dataclass, field
from typing import List


@dataclass
class Item:
    """A priced line item."""

    sku: str
    unit_price: float
    quantity: int = 1

    def subtotal(self) -> float:
        """Price of the line before discounts."""
        return self.unit_price * self.quantity

    def describe(self):
        return f"{self.quantity} x {self.sku} @ {self.unit_price:.2f}"


@dataclass
class Order:
    """An order is a list of items plus a customer id."""

    customer_id: str
    items: List[Item] = field(default_factory=list)

    def add(self, item: Item) -> None:
        """Append an item, merging quantities for a repeated sku."""
        for existing in self.items:
            if existing.sku == item.sku:
                existing.quantity += item.quantity
                return
        self.items.append(item)

    def is_empty(self) -> bool:
        return len(self.items) == 0

    @property
    def item_count(self) -> int:
        return sum(i.quantity for i in self.items)
