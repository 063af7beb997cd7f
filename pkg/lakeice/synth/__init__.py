"""Synthetic lakes with known ice phenology"""
