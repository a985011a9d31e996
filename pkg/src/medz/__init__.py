"""Partition functions over Hamming medians, the clause-gadget counting reduction,
small parsimony on binary trees and median samplers."""

__version__ = "0.1.0"
