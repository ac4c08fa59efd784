"""Workbench for intuitionistic and here-and-there temporal logics."""
