"""Raster pre-processing and file formats"""
