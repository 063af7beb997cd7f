"""Pixel classification: linear SVM, metrics and evaluation harness"""
