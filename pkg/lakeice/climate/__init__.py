"""Meteorological indicators, LIP trends and correlations"""
