"""Tests for ringbound"""
