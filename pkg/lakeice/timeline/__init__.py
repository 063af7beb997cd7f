"""Per-winter non-frozen percentage timelines"""
