#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Keep test outputs and the log file out of the user's data directory
"""

import os
import tempfile

os.environ.setdefault("GLMVI_DATA", tempfile.mkdtemp(prefix="glmvi_test_"))
