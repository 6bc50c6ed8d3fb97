"""CART classification trees and random forests."""
