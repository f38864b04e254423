namespace crvec {}
