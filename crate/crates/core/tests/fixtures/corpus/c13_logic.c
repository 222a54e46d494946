int nondet();
int main() {
  int a = nondet();
  int b = nondet();
  int c = 0;
  if (a > 0 && b > 0) {
    c = 1;
  }
  if (a < 0 || b < 0) {
    c = c + 2;
  }
  assert(c != 3);
  return c;
}
