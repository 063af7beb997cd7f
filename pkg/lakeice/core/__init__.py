"""Core components: configuration, domain models, calendar and numeric primitives"""
