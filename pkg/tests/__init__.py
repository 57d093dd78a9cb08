# CCPG Tests
