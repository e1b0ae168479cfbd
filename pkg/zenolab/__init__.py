from zenolab.info import VERSION as __version__

DEBUG = False
