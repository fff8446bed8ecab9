using Xunit;

public class TrueXunit
{
    [Fact]
    public void StartsEmpty()
    {
        Assert.Empty(new int[0]);
    }
}
