"""Pipeline services: stage runner and run manifests"""
