int nondet();
int main() {
  int x = nondet();
  int y = x + 1;
  assert(y > -2);
  if (x > 1) {
    y = 0;
  }
  assert(y <= 2);
  return 0;
}
