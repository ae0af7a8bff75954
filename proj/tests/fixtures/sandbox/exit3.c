#include <stdio.h>

/* Prints the right answer, then reports failure. */
int main(void)
{
  puts("42");
  return 3;
}
