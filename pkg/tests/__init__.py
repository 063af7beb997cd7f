"""lakeice tests"""
