"""Lake ice phenology: FUS/FUE/BUS/BUE extraction from winter timelines"""
