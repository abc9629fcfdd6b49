"""Command-line interface for sisrec"""
