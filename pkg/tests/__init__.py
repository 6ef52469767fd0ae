# Covshift Lab - Tests
