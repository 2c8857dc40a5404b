# Hex Borel Toolkit
